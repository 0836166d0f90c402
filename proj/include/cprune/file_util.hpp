/* Copyright 2026 The cprune Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// File helpers shared by the command-line tools.

#ifndef CPRUNE_FILE_UTIL_HPP_
#define CPRUNE_FILE_UTIL_HPP_

#include <filesystem>
#include <string>
#include <string_view>

namespace cprune {

// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

// Throws ConfigError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace cprune

#endif  // CPRUNE_FILE_UTIL_HPP_
