#pragma once

#include "formopt/error.hpp"
#include "formopt/tolerance.hpp"
#include "formopt/form.hpp"
#include "formopt/certify.hpp"
#include "formopt/search.hpp"
#include "formopt/grid_oracle.hpp"
#include "formopt/spurious.hpp"
#include "formopt/json_io.hpp"
