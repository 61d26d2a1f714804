#pragma once

// Convenience umbrella: the whole toolkit in one include.

#include "chart.hpp"
#include "core.hpp"
#include "guard.hpp"
#include "hybrid.hpp"
#include "io.hpp"
#include "limits.hpp"
#include "models.hpp"
#include "ode.hpp"
#include "poincare.hpp"
#include "verify.hpp"
