#pragma once

#include "gid/corpus.hpp"
#include "gid/decomposition.hpp"
#include "gid/distributions.hpp"
#include "gid/error.hpp"
#include "gid/io.hpp"
#include "gid/lattice.hpp"
#include "gid/measures.hpp"
#include "gid/redundancy.hpp"
