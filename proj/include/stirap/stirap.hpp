// stirap.hpp: umbrella header.

#pragma once

#include "stirap/types.hpp"
#include "stirap/model.hpp"
#include "stirap/frames.hpp"
#include "stirap/integrator.hpp"
#include "stirap/dynamics.hpp"
#include "stirap/network.hpp"
#include "stirap/io.hpp"
#include "stirap/harness.hpp"
