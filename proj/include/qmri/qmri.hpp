// Copyright 2026 The qmri Authors
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

#include "qmri/config.hpp"
#include "qmri/errors.hpp"
#include "qmri/image.hpp"
#include "qmri/io.hpp"
#include "qmri/metrics.hpp"
#include "qmri/mri.hpp"
#include "qmri/nn/adam.hpp"
#include "qmri/nn/gradcheck.hpp"
#include "qmri/nn/layers.hpp"
#include "qmri/nn/network.hpp"
#include "qmri/nn/tensor.hpp"
#include "qmri/pipeline.hpp"
#include "qmri/qsim.hpp"
#include "qmri/quanv.hpp"
