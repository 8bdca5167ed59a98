/*
 * Copyright 2026 The fedsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

#include "fedsim/dataset.hpp"

namespace fedsim {

enum class IdxErrorKind { kMissingFile, kBadMagic, kTruncated, kCountMismatch };

class IdxError : public std::runtime_error {
public:
    IdxError(IdxErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    IdxErrorKind kind() const { return kind_; }

private:
    IdxErrorKind kind_;
};

// Classic IDX container (big-endian magic + dims + raw bytes). Images use
// magic 0x00000803, labels 0x00000801. Pixels are scaled to [0, 1] and each
// image is flattened row-major.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace fedsim
