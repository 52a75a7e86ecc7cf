// Copyright 2026 The AIRI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Everything except the command line.

#pragma once

#include "airi/chem.hpp"
#include "airi/dataset.hpp"
#include "airi/error.hpp"
#include "airi/featurize.hpp"
#include "airi/metrics.hpp"
#include "airi/pagtn.hpp"
#include "airi/plot.hpp"
#include "airi/rng.hpp"
#include "airi/synth.hpp"
#include "airi/tensor.hpp"
#include "airi/train.hpp"
#include "airi/uncertainty.hpp"
