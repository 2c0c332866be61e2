#pragma once

#include "ptlab/bitstring.hpp"
#include "ptlab/classical.hpp"
#include "ptlab/common.hpp"
#include "ptlab/downfold.hpp"
#include "ptlab/grover.hpp"
#include "ptlab/instance.hpp"
#include "ptlab/io.hpp"
#include "ptlab/ising.hpp"
#include "ptlab/linalg.hpp"
#include "ptlab/pblm.hpp"
#include "ptlab/pipeline.hpp"
#include "ptlab/rng.hpp"
#include "ptlab/serialize.hpp"
#include "ptlab/stable.hpp"
#include "ptlab/statevector.hpp"
