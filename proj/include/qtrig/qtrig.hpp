#pragma once

#include "qtrig/checks.hpp"
#include "qtrig/config.hpp"
#include "qtrig/errors.hpp"
#include "qtrig/graph.hpp"
#include "qtrig/lambert_w.hpp"
#include "qtrig/protocol.hpp"
#include "qtrig/quantizer.hpp"
#include "qtrig/report.hpp"
#include "qtrig/seminorm.hpp"
#include "qtrig/simulation.hpp"
#include "qtrig/trigger.hpp"
