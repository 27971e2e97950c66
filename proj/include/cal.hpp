#pragma once

#include "cal/bitvec.hpp"
#include "cal/codec.hpp"
#include "cal/correlator.hpp"
#include "cal/network.hpp"
#include "cal/region.hpp"
#include "cal/sequence_memory.hpp"
#include "cal/synapses.hpp"
