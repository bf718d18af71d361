#pragma once

#include "mnar/compare.hpp"
#include "mnar/errors.hpp"
#include "mnar/estimators.hpp"
#include "mnar/indexing.hpp"
#include "mnar/inference.hpp"
#include "mnar/likelihood.hpp"
#include "mnar/linear_solve.hpp"
#include "mnar/loglinear.hpp"
#include "mnar/model_space.hpp"
#include "mnar/report.hpp"
#include "mnar/simulate.hpp"
#include "mnar/table.hpp"
#include "mnar/table_io.hpp"
