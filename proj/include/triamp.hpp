// Copyright 2026 The triamp Authors
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


#pragma once

#include "triamp/baseline.hpp"
#include "triamp/channel.hpp"
#include "triamp/denoisers.hpp"
#include "triamp/frame.hpp"
#include "triamp/linalg.hpp"
#include "triamp/metrics.hpp"
#include "triamp/posterior_oracle.hpp"
#include "triamp/quadrature.hpp"
#include "triamp/replica.hpp"
#include "triamp/rng.hpp"
#include "triamp/snapshot.hpp"
#include "triamp/system_config.hpp"
#include "triamp/tri_amp.hpp"
