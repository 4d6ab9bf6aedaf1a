#pragma once

#include "finspec/matrix.hpp"
#include "finspec/operator_space.hpp"
#include "finspec/spectral.hpp"
#include "finspec/exterior.hpp"
#include "finspec/standard_model.hpp"
#include "finspec/serialization.hpp"
