#pragma once

#include "ffn/error.hpp"
#include "ffn/network.hpp"
#include "ffn/coloring.hpp"
#include "ffn/lift.hpp"
#include "ffn/jet.hpp"
#include "ffn/branches.hpp"
#include "ffn/lifting.hpp"
#include "ffn/numeric.hpp"
#include "ffn/report.hpp"
