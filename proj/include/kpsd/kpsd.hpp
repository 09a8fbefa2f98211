#pragma once

#include "kpsd/averaging.hpp"
#include "kpsd/closure.hpp"
#include "kpsd/cone.hpp"
#include "kpsd/constructions.hpp"
#include "kpsd/designs.hpp"
#include "kpsd/error.hpp"
#include "kpsd/experiments.hpp"
#include "kpsd/ksets.hpp"
#include "kpsd/random.hpp"
#include "kpsd/symmat.hpp"
