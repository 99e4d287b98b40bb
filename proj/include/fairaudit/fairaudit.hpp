#pragma once

#include "fairaudit/common.hpp"
#include "fairaudit/data.hpp"
#include "fairaudit/experiment.hpp"
#include "fairaudit/metrics.hpp"
#include "fairaudit/mitigation.hpp"
#include "fairaudit/model.hpp"
#include "fairaudit/report.hpp"
#include "fairaudit/stats.hpp"
