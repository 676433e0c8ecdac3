// Copyright 2026 The streamap Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STREAMAP_TESTS_FIXTURES_HPP_
#define STREAMAP_TESTS_FIXTURES_HPP_

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "streamap/data_model.hpp"
#include "streamap/stream_sim.hpp"

namespace streamap::testing {

// Frames for `lengths.size()` sequences, one annotation per frame cycling
// through `classes` categories.
inline Dataset make_stream_dataset(const std::vector<int>& lengths, int classes = 8,
                                   double fps = 30.0) {
  Dataset d;
  for (int c = 0; c < classes; ++c) d.categories[c] = "class" + std::to_string(c);
  ImageId id = 1;
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    for (int f = 0; f < lengths[s]; ++f) {
      FrameRecord r;
      r.image_id = id;
      r.sequence_id = static_cast<SequenceId>(s + 1);
      r.frame_index = f;
      r.timestamp = frame_time(f, fps);
      r.width = 1920;
      r.height = 1200;
      d.images.push_back(r);
      d.annotations.push_back(
          {id, id, static_cast<CategoryId>(id % classes), {10, 10, 50, 40}, 2000});
      ++id;
    }
  }
  return d;
}

// Random sequence lengths summing to `total` across `sequences` sequences.
inline std::vector<int> split_lengths(int total, int sequences, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<double> w(static_cast<std::size_t>(sequences));
  std::uniform_real_distribution<double> u(0.5, 1.5);
  double sum = 0;
  for (auto& v : w) sum += (v = u(gen));
  std::vector<int> out;
  int used = 0;
  for (int s = 0; s < sequences; ++s) {
    const int n = s + 1 == sequences ? total - used : static_cast<int>(total * w[s] / sum);
    out.push_back(n);
    used += n;
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("streamap_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace streamap::testing

#endif  // STREAMAP_TESTS_FIXTURES_HPP_
