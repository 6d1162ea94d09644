#pragma once

#include "ccafuse/cca.hpp"
#include "ccafuse/error.hpp"
#include "ccafuse/experiment.hpp"
#include "ccafuse/forest.hpp"
#include "ccafuse/fusion.hpp"
#include "ccafuse/graph.hpp"
#include "ccafuse/io.hpp"
#include "ccafuse/matrix.hpp"
#include "ccafuse/metrics.hpp"
#include "ccafuse/parallel.hpp"
#include "ccafuse/random.hpp"
#include "ccafuse/simulate.hpp"
