// Copyright 2026 The vqalab Authors. All Rights Reserved.
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


#ifndef VQALAB_TOOLS_CLI_H_
#define VQALAB_TOOLS_CLI_H_

#include <ostream>
#include <string>
#include <vector>

namespace vqalab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

// Entry point of the vqalab tool; argv[0] is the program name.
int Run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

// 64-bit FNV-1a, hex encoded.
std::string ConfigHash(const std::string& canonical);

}  // namespace vqalab::cli

#endif  // VQALAB_TOOLS_CLI_H_
