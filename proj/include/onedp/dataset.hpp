// Copyright 2026 The onedp Authors. All Rights Reserved.
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

#ifndef ONEDP_DATASET_HPP_
#define ONEDP_DATASET_HPP_

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "onedp/error.hpp"
#include "onedp/image.hpp"
#include "onedp/log.hpp"
#include "onedp/tensor.hpp"

namespace onedp {

struct Augmentation {
  bool random_crop = false;
  bool random_flip = false;
};

// Images of a directory tree. Files directly under the root are unlabeled
// (label 0, class ""); files under root/<class>/ take the class directory's
// label. Labels index the sorted class names.
struct Dataset {
  int image_size = 0;
  std::vector<ImageTensor> images;
  std::vector<std::filesystem::path> paths;
  std::vector<int> labels;
  std::vector<std::string> class_names;

  size_t size() const { return images.size(); }
  bool empty() const { return images.empty(); }
};

inline bool is_png(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

inline std::vector<std::filesystem::path> list_pngs(const std::filesystem::path& root) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file() && is_png(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  return files;
}

// Loads every PNG under `root`. With random_crop, sources larger than
// image_size keep their resolution so crops can be drawn per batch; all
// other images are center-cropped and resampled to image_size.
inline Dataset load_dataset(const std::filesystem::path& root, int image_size,
                            const Augmentation& aug = {}, int channels = 3) {
  require(std::filesystem::is_directory(root), ErrorKind::kIngestion,
          "dataset directory '" + root.string() + "' does not exist");
  Dataset ds;
  ds.image_size = image_size;
  std::map<std::string, int> class_ids;
  std::vector<std::string> raw_labels;
  for (const auto& file : list_pngs(root)) {
    ImageTensor img;
    try {
      img = read_png(file, channels);
    } catch (const Error& e) {
      log::warn("skipping " + file.string() + ": " + e.what());
      continue;
    }
    const bool keep_full = aug.random_crop && img.height >= image_size && img.width >= image_size;
    ds.images.push_back(keep_full ? std::move(img) : fit_square(img, image_size));
    ds.paths.push_back(file);
    const auto rel = std::filesystem::relative(file, root);
    raw_labels.push_back(std::distance(rel.begin(), rel.end()) > 1 ? rel.begin()->string() : "");
    class_ids[raw_labels.back()] = 0;
  }
  require(!ds.images.empty(), ErrorKind::kIngestion,
          "no readable PNG images under '" + root.string() + "'");
  int next = 0;
  for (auto& [name, id] : class_ids) {
    id = next++;
    ds.class_names.push_back(name);
  }
  for (const auto& l : raw_labels) ds.labels.push_back(class_ids[l]);
  return ds;
}

// Yields batches in a seeded, reshuffled-per-epoch order with optional
// random crop and horizontal flip. Fully deterministic for a fixed seed.
class BatchStream {
 public:
  BatchStream(const Dataset& dataset, int batch_size, const Augmentation& aug, std::uint64_t seed)
      : dataset_(dataset),
        batch_size_(batch_size),
        aug_(aug),
        order_rng_(make_stream(seed, StreamTag::kDataOrder)),
        aug_rng_(make_stream(seed, StreamTag::kAugment)) {
    require(!dataset.empty(), ErrorKind::kIngestion, "empty dataset");
    require(batch_size > 0, ErrorKind::kConfig, "batch size must be positive");
    reshuffle();
  }

  std::vector<ImageTensor> next() {
    std::vector<ImageTensor> batch;
    batch.reserve(static_cast<size_t>(batch_size_));
    while (batch.size() < static_cast<size_t>(batch_size_)) {
      if (cursor_ == order_.size()) reshuffle();
      batch.push_back(augment(dataset_.images[order_[cursor_++]]));
    }
    return batch;
  }

  int epoch() const { return epoch_; }

  ImageTensor augment(const ImageTensor& src) {
    const int s = dataset_.image_size;
    ImageTensor img;
    if (src.height > s || src.width > s) {
      if (aug_.random_crop) {
        std::uniform_int_distribution<int> dy(0, src.height - s), dx(0, src.width - s);
        const int top = dy(aug_rng_);
        const int left = dx(aug_rng_);
        img = crop(src, top, left, s, s);
      } else {
        img = fit_square(src, s);
      }
    } else {
      img = src;
    }
    if (aug_.random_flip && std::bernoulli_distribution(0.5)(aug_rng_)) img = flip_horizontal(img);
    return img;
  }

 private:
  void reshuffle() {
    order_.resize(dataset_.size());
    for (size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::shuffle(order_.begin(), order_.end(), order_rng_);
    cursor_ = 0;
    ++epoch_;
  }

  const Dataset& dataset_;
  int batch_size_;
  Augmentation aug_;
  Rng order_rng_;
  Rng aug_rng_;
  std::vector<size_t> order_;
  size_t cursor_ = 0;
  int epoch_ = 0;
};

}  // namespace onedp

#endif  // ONEDP_DATASET_HPP_
