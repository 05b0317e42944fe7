// Copyright 2026 The onedp Authors. All Rights Reserved.
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

// Umbrella header for the onedp library.

#ifndef ONEDP_ONEDP_HPP_
#define ONEDP_ONEDP_HPP_

#include "onedp/analysis.hpp"
#include "onedp/checkpoint.hpp"
#include "onedp/codec.hpp"
#include "onedp/config.hpp"
#include "onedp/dataset.hpp"
#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/layers.hpp"
#include "onedp/log.hpp"
#include "onedp/metrics.hpp"
#include "onedp/model.hpp"
#include "onedp/optimizer.hpp"
#include "onedp/plot.hpp"
#include "onedp/quantizer.hpp"
#include "onedp/synth.hpp"
#include "onedp/tail_token_drop.hpp"
#include "onedp/tensor.hpp"
#include "onedp/trainer.hpp"

#endif  // ONEDP_ONEDP_HPP_
