// Copyright 2026 The blockchaos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "blockchaos/classical.hpp"
#include "blockchaos/ensembles.hpp"
#include "blockchaos/errors.hpp"
#include "blockchaos/figures.hpp"
#include "blockchaos/floquet.hpp"
#include "blockchaos/io.hpp"
#include "blockchaos/linalg.hpp"
#include "blockchaos/noise.hpp"
#include "blockchaos/noise_spec.hpp"
#include "blockchaos/oracle.hpp"
#include "blockchaos/random_matrix.hpp"
#include "blockchaos/runner.hpp"
#include "blockchaos/spin.hpp"
#include "blockchaos/stats.hpp"
#include "blockchaos/version.hpp"
