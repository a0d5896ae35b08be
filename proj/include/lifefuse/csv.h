/*
 * Copyright 2026 The lifefuse Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef LIFEFUSE_CSV_H_
#define LIFEFUSE_CSV_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lifefuse::csv {

// %.17g; "nan", "inf", "-inf" for non-finite values.
std::string FormatDouble(double value);

// Locale-independent; rejects trailing garbage and non-finite values.
std::optional<double> ParseDouble(std::string_view text);

// Splits one record. Handles double-quoted fields with "" escapes.
std::vector<std::string> SplitLine(std::string_view line);

// Quotes the field if it contains a comma, quote or newline.
std::string Quote(std::string_view field);

}  // namespace lifefuse::csv

#endif  // LIFEFUSE_CSV_H_
