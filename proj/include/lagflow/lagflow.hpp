#pragma once

#include <lagflow/grid.hpp>
#include <lagflow/field.hpp>
#include <lagflow/operators.hpp>
#include <lagflow/interpolate.hpp>
#include <lagflow/dynamics.hpp>
#include <lagflow/flowmap.hpp>
#include <lagflow/state.hpp>
#include <lagflow/diagnostics.hpp>
#include <lagflow/initial_condition.hpp>
#include <lagflow/config.hpp>
#include <lagflow/snapshot.hpp>
#include <lagflow/simulate.hpp>
#include <lagflow/verify.hpp>
