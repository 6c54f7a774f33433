#pragma once

#include "uscqed/linalg.hpp"
#include "uscqed/operators.hpp"
#include "uscqed/models.hpp"
#include "uscqed/born_oppenheimer.hpp"
#include "uscqed/analytics.hpp"
#include "uscqed/spectroscopy.hpp"
#include "uscqed/ramsey.hpp"
#include "uscqed/circuit.hpp"
