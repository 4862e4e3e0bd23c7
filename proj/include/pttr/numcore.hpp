#pragma once

#include "pttr/numcore/checkpoint.hpp"
#include "pttr/numcore/layers.hpp"
#include "pttr/numcore/loss.hpp"
#include "pttr/numcore/ops.hpp"
#include "pttr/numcore/optim.hpp"
#include "pttr/numcore/random.hpp"
#include "pttr/numcore/tensor.hpp"
