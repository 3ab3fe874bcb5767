// Copyright 2026 The qdev Authors
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

// Library headers, without the command-line front end (qdev/cli.hpp) and
// the JSON device files (qdev/device_file.hpp).

#include "qdev/compat.hpp"
#include "qdev/devices.hpp"
#include "qdev/dilation.hpp"
#include "qdev/errors.hpp"
#include "qdev/feasibility.hpp"
#include "qdev/fixtures.hpp"
#include "qdev/matkit.hpp"
#include "qdev/memo.hpp"
#include "qdev/order.hpp"
