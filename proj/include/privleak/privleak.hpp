#pragma once

#include "error.hpp"
#include "alarm.hpp"
#include "entropy.hpp"
#include "leakage.hpp"
#include "lmm.hpp"
#include "simulation.hpp"
#include "table1.hpp"
#include "config.hpp"
#include "report.hpp"
#include "session.hpp"
#include "server.hpp"
