#pragma once

#include "projlab/algebra.hpp"
#include "projlab/dimension.hpp"
#include "projlab/error.hpp"
#include "projlab/families.hpp"
#include "projlab/presets.hpp"
#include "projlab/transversality.hpp"
