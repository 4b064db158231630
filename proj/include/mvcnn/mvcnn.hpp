#pragma once

#include "mvcnn/array.hpp"
#include "mvcnn/checkpoint.hpp"
#include "mvcnn/embeddings.hpp"
#include "mvcnn/gradcheck.hpp"
#include "mvcnn/mutual_learning.hpp"
#include "mvcnn/network.hpp"
#include "mvcnn/ops.hpp"
#include "mvcnn/optim.hpp"
#include "mvcnn/pretrain.hpp"
#include "mvcnn/rng.hpp"
#include "mvcnn/text.hpp"
#include "mvcnn/train.hpp"
