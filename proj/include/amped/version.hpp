// Copyright (c) 2026 The Amped Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace amped {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace amped
