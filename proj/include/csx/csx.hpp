#pragma once

#include "csx/core.hpp"
#include "csx/models.hpp"
#include "csx/spectrum.hpp"
#include "csx/analysis.hpp"
#include "csx/existence.hpp"
#include "csx/simplex.hpp"
#include "csx/manifolds.hpp"
#include "csx/classify.hpp"
#include "csx/io.hpp"
#include "csx/config.hpp"
#include "csx/portrait.hpp"
#include "csx/commands.hpp"
