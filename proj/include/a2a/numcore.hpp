// a2a/numcore.hpp

// Copyright 2026  a2a-lab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "a2a/numcore/attention.hpp"
#include "a2a/numcore/batch.hpp"
#include "a2a/numcore/checkpoint.hpp"
#include "a2a/numcore/common.hpp"
#include "a2a/numcore/config.hpp"
#include "a2a/numcore/gradcheck.hpp"
#include "a2a/numcore/layer.hpp"
#include "a2a/numcore/layers.hpp"
#include "a2a/numcore/lstm.hpp"
#include "a2a/numcore/matrix.hpp"
#include "a2a/numcore/optimizer.hpp"
#include "a2a/numcore/parallel.hpp"
#include "a2a/numcore/rng.hpp"
#include "a2a/numcore/semiorth.hpp"
#include "a2a/numcore/stack.hpp"
#include "a2a/numcore/tdnnf.hpp"
