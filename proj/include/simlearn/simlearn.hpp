#pragma once

#include "simlearn/error.hpp"
#include "simlearn/rational.hpp"
#include "simlearn/working_memory.hpp"
#include "simlearn/expression.hpp"
#include "simlearn/conditions.hpp"
#include "simlearn/induction.hpp"
#include "simlearn/tutor.hpp"
#include "simlearn/fraction_tutor.hpp"
#include "simlearn/box_tutor.hpp"
#include "simlearn/agent.hpp"
#include "simlearn/problem_io.hpp"
#include "simlearn/experiment.hpp"
#include "simlearn/analytics.hpp"
