// Copyright 2026 The sdslab Authors. All Rights Reserved.
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

#include "sdslab/dataset_stats.hpp"
#include "sdslab/error.hpp"
#include "sdslab/io/manifest.hpp"
#include "sdslab/io/masks.hpp"
#include "sdslab/io/png.hpp"
#include "sdslab/io/synthetic.hpp"
#include "sdslab/mask.hpp"
#include "sdslab/metrics.hpp"
#include "sdslab/metrics_report.hpp"
#include "sdslab/net/checkpoint.hpp"
#include "sdslab/net/gradcheck.hpp"
#include "sdslab/net/labels.hpp"
#include "sdslab/net/layers.hpp"
#include "sdslab/net/loss.hpp"
#include "sdslab/net/network.hpp"
#include "sdslab/net/tensor.hpp"
#include "sdslab/net/train.hpp"
#include "sdslab/parallel.hpp"
#include "sdslab/ranking.hpp"
#include "sdslab/stats_report.hpp"
