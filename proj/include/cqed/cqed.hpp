#pragma once

#include "cqed/tensor.hpp"
#include "cqed/model.hpp"
#include "cqed/protocol.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/entanglement.hpp"
#include "cqed/experiments.hpp"
