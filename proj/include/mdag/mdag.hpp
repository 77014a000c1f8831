#pragma once

#include "mdag/default_template.hpp"
#include "mdag/error.hpp"
#include "mdag/experiment.hpp"
#include "mdag/json_io.hpp"
#include "mdag/rational.hpp"
#include "mdag/report.hpp"
#include "mdag/simulator.hpp"
#include "mdag/taskmodel.hpp"
#include "mdag/time.hpp"
#include "mdag/workload.hpp"
