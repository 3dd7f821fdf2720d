/* Copyright 2026 The LongiPET Authors. All Rights Reserved.

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

#ifndef LONGIPET_MANIFEST_HPP_
#define LONGIPET_MANIFEST_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "longipet/volume.hpp"

namespace longipet {

enum class Group { kCN, kMCI, kDementia };

const char* group_name(Group group);
std::optional<Group> parse_group(const std::string& name);

// One subject with its scans in memory, keyed by year (0 = baseline).
struct SubjectRecord {
  std::string id;
  Group group = Group::kCN;
  std::map<int, Volume3D> scans;

  bool has_years(std::initializer_list<int> years) const;
  const Volume3D& scan(int year) const;
};

// One manifest row. Paths are stored resolved against the manifest directory.
struct ManifestEntry {
  std::string id;
  Group group = Group::kCN;
  std::map<int, std::filesystem::path> scans;
  // Free-form annotations carried through (e.g. applied augmentation).
  nlohmann::json annotations = nlohmann::json::object();

  // Years 0, 1 and 2 all present: eligible for training and year-2 testing.
  bool training_eligible() const;
};

struct CohortManifest {
  std::vector<ManifestEntry> subjects;

  const ManifestEntry* find(const std::string& id) const;
  std::vector<std::string> ids() const;
};

// Parses and fully validates: schema, unique ids, every file present with a
// parseable header, and consistent dims within each subject.
CohortManifest load_manifest(const std::filesystem::path& path);

// Schema checks only; files are not touched. Paths resolve against `base_dir`.
CohortManifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base_dir);

// Scan paths are written relative to the manifest's directory when possible.
void save_manifest(const CohortManifest& manifest, const std::filesystem::path& path);

SubjectRecord load_subject(const ManifestEntry& entry);

}  // namespace longipet

#endif  // LONGIPET_MANIFEST_HPP_
