// Copyright 2026 The qcnn-softdrop Authors
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
/**
 * @file
 * Umbrella header.
 */
#pragma once

#include "qcnn/cli.hpp"
#include "qcnn/data.hpp"
#include "qcnn/errors.hpp"
#include "qcnn/experiment.hpp"
#include "qcnn/mitigate.hpp"
#include "qcnn/model.hpp"
#include "qcnn/model_io.hpp"
#include "qcnn/parallel.hpp"
#include "qcnn/report.hpp"
#include "qcnn/rng.hpp"
#include "qcnn/sim/dense_unitary.hpp"
#include "qcnn/sim/gates.hpp"
#include "qcnn/sim/state_vector.hpp"
#include "qcnn/train.hpp"
