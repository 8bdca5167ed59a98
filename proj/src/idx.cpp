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

#include "fedsim/idx.hpp"

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <vector>

namespace fedsim {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IdxError(IdxErrorKind::kMissingFile, "cannot open " + path);
    }
    return std::vector<unsigned char>(std::istreambuf_iterator<char>(in),
                                      std::istreambuf_iterator<char>());
}

std::uint32_t read_u32_be(const std::vector<unsigned char>& bytes, std::size_t offset,
                          const std::string& path) {
    if (offset + 4 > bytes.size()) {
        throw IdxError(IdxErrorKind::kTruncated,
                       path + ": truncated at offset " + std::to_string(offset) +
                           " (need 4 bytes, have " + std::to_string(bytes.size() - offset) + ")");
    }
    return (static_cast<std::uint32_t>(bytes[offset]) << 24) |
           (static_cast<std::uint32_t>(bytes[offset + 1]) << 16) |
           (static_cast<std::uint32_t>(bytes[offset + 2]) << 8) |
           static_cast<std::uint32_t>(bytes[offset + 3]);
}

void check_payload(const std::vector<unsigned char>& bytes, std::size_t header,
                   std::size_t payload, const std::string& path) {
    if (bytes.size() < header + payload) {
        throw IdxError(IdxErrorKind::kTruncated,
                       path + ": truncated at offset " + std::to_string(bytes.size()) +
                           " (payload needs " + std::to_string(header + payload) + " bytes)");
    }
}

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
    const std::vector<unsigned char> img = read_file(images_path);
    const std::uint32_t img_magic = read_u32_be(img, 0, images_path);
    if (img_magic != kImagesMagic) {
        throw IdxError(IdxErrorKind::kBadMagic,
                       images_path + ": bad magic at offset 0 (got 0x" +
                           std::to_string(img_magic) + ", want 2051)");
    }
    const std::uint32_t n_images = read_u32_be(img, 4, images_path);
    const std::uint32_t n_rows = read_u32_be(img, 8, images_path);
    const std::uint32_t n_cols = read_u32_be(img, 12, images_path);
    const std::size_t pixels = static_cast<std::size_t>(n_rows) * n_cols;
    check_payload(img, 16, static_cast<std::size_t>(n_images) * pixels, images_path);

    const std::vector<unsigned char> lab = read_file(labels_path);
    const std::uint32_t lab_magic = read_u32_be(lab, 0, labels_path);
    if (lab_magic != kLabelsMagic) {
        throw IdxError(IdxErrorKind::kBadMagic,
                       labels_path + ": bad magic at offset 0 (got 0x" +
                           std::to_string(lab_magic) + ", want 2049)");
    }
    const std::uint32_t n_labels = read_u32_be(lab, 4, labels_path);
    check_payload(lab, 8, n_labels, labels_path);

    if (n_images != n_labels) {
        throw IdxError(IdxErrorKind::kCountMismatch,
                       "count mismatch: " + std::to_string(n_images) + " images in " +
                           images_path + " vs " + std::to_string(n_labels) + " labels in " +
                           labels_path);
    }

    Dataset ds;
    ds.features = DenseMatrix(n_images, pixels);
    ds.labels.resize(n_images);
    int max_label = 0;
    for (std::uint32_t i = 0; i < n_images; ++i) {
        for (std::size_t p = 0; p < pixels; ++p) {
            ds.features(i, p) = static_cast<double>(img[16 + i * pixels + p]) / 255.0;
        }
        ds.labels[i] = static_cast<int>(lab[8 + i]);
        max_label = std::max(max_label, ds.labels[i]);
    }
    ds.num_classes = max_label + 1;
    return ds;
}

}  // namespace fedsim
