#pragma once

#include "bbx/error.hpp"
#include "bbx/linalg.hpp"
#include "bbx/geometry.hpp"
#include "bbx/box3d.hpp"
#include "bbx/random.hpp"
#include "bbx/filters.hpp"
#include "bbx/metrics.hpp"
#include "bbx/estimators.hpp"
#include "bbx/observability.hpp"
#include "bbx/trajectory.hpp"
#include "bbx/simulator.hpp"
#include "bbx/scenarios.hpp"
#include "bbx/io.hpp"
#include "bbx/config.hpp"
