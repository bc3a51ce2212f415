#pragma once

// Umbrella header: pulls in the whole library.

#include "diffpass/linalg.hpp"
#include "diffpass/parallel.hpp"
#include "diffpass/signal.hpp"
#include "diffpass/model.hpp"
#include "diffpass/prolong.hpp"
#include "diffpass/storage.hpp"
#include "diffpass/conditions.hpp"
#include "diffpass/simulate.hpp"
#include "diffpass/interconnect.hpp"
#include "diffpass/examples.hpp"
#include "diffpass/plot.hpp"
