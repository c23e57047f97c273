// Copyright 2026 The mpu-verify Authors
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
//
// Convenience header pulling in the whole library.

#pragma once

#include "mpu/basis.hpp"
#include "mpu/chain.hpp"
#include "mpu/core.hpp"
#include "mpu/format.hpp"
#include "mpu/gallery.hpp"
#include "mpu/lme.hpp"
#include "mpu/oracle.hpp"
#include "mpu/span.hpp"
#include "mpu/tensor.hpp"
#include "mpu/transfer.hpp"
#include "mpu/uniform.hpp"
#include "mpu/unitarity.hpp"
