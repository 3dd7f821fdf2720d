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

#include "longipet/manifest.hpp"

#include <fstream>
#include <set>

#include "longipet/error.hpp"
#include "longipet/volume_io.hpp"

namespace longipet {

namespace fs = std::filesystem;
using nlohmann::json;

const char* group_name(Group group) {
  switch (group) {
    case Group::kCN: return "CN";
    case Group::kMCI: return "MCI";
    case Group::kDementia: return "Dementia";
  }
  return "?";
}

std::optional<Group> parse_group(const std::string& name) {
  if (name == "CN") return Group::kCN;
  if (name == "MCI") return Group::kMCI;
  if (name == "Dementia") return Group::kDementia;
  return std::nullopt;
}

bool SubjectRecord::has_years(std::initializer_list<int> years) const {
  for (int y : years) {
    if (!scans.count(y)) return false;
  }
  return true;
}

const Volume3D& SubjectRecord::scan(int year) const {
  auto it = scans.find(year);
  if (it == scans.end()) {
    fail(ErrorKind::kInput, "subject " + id + " has no scan for year " + std::to_string(year));
  }
  return it->second;
}

bool ManifestEntry::training_eligible() const {
  return scans.count(0) && scans.count(1) && scans.count(2);
}

const ManifestEntry* CohortManifest::find(const std::string& id) const {
  for (const auto& s : subjects) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

std::vector<std::string> CohortManifest::ids() const {
  std::vector<std::string> out;
  out.reserve(subjects.size());
  for (const auto& s : subjects) out.push_back(s.id);
  return out;
}

CohortManifest parse_manifest(const json& j, const fs::path& base_dir) {
  if (!j.is_object() || !j.contains("subjects") || !j["subjects"].is_array()) {
    fail(ErrorKind::kManifest, "manifest must be an object with a \"subjects\" array");
  }
  CohortManifest m;
  std::set<std::string> seen;
  for (const json& s : j["subjects"]) {
    if (!s.is_object()) fail(ErrorKind::kManifest, "subject entry must be an object");
    if (!s.contains("id") || !s["id"].is_string()) {
      fail(ErrorKind::kManifest, "subject entry needs a string \"id\"");
    }
    ManifestEntry e;
    e.id = s["id"].get<std::string>();
    if (e.id.empty()) fail(ErrorKind::kManifest, "empty subject id");
    if (!seen.insert(e.id).second) fail(ErrorKind::kManifest, "duplicate subject id " + e.id);
    if (!s.contains("group") || !s["group"].is_string()) {
      fail(ErrorKind::kManifest, "subject " + e.id + " needs a string \"group\"");
    }
    auto group = parse_group(s["group"].get<std::string>());
    if (!group) {
      fail(ErrorKind::kManifest, "subject " + e.id + ": group must be CN, MCI or Dementia");
    }
    e.group = *group;
    if (!s.contains("scans") || !s["scans"].is_object() || s["scans"].empty()) {
      fail(ErrorKind::kManifest, "subject " + e.id + " needs a non-empty \"scans\" object");
    }
    for (const auto& [key, value] : s["scans"].items()) {
      std::size_t used = 0;
      int year = -1;
      try {
        year = std::stoi(key, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != key.size() || year < 0) {
        fail(ErrorKind::kManifest, "subject " + e.id + ": scan key \"" + key +
                                       "\" is not a non-negative year index");
      }
      if (!value.is_string()) {
        fail(ErrorKind::kManifest, "subject " + e.id + ": scan path must be a string");
      }
      fs::path p = value.get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      e.scans[year] = p.lexically_normal();
    }
    if (s.contains("annotations")) e.annotations = s["annotations"];
    m.subjects.push_back(std::move(e));
  }
  return m;
}

CohortManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open manifest " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    fail(ErrorKind::kManifest, path.string() + ": " + e.what());
  }
  CohortManifest m = parse_manifest(j, path.parent_path());
  for (const auto& e : m.subjects) {
    std::optional<Dims3> dims;
    for (const auto& [year, scan] : e.scans) {
      Dims3 d;
      try {
        d = probe_volume(scan);
      } catch (const Error& err) {
        fail(ErrorKind::kManifest, "subject " + e.id + " year " + std::to_string(year) + ": " +
                                       err.what());
      }
      if (dims && !(*dims == d)) {
        fail(ErrorKind::kManifest, "subject " + e.id + ": scans disagree on dims");
      }
      dims = d;
    }
  }
  return m;
}

void save_manifest(const CohortManifest& manifest, const fs::path& path) {
  fs::path base = path.parent_path();
  json subjects = json::array();
  for (const auto& e : manifest.subjects) {
    json s;
    s["id"] = e.id;
    s["group"] = group_name(e.group);
    json scans = json::object();
    for (const auto& [year, p] : e.scans) {
      fs::path rel = base.empty() ? p : p.lexically_relative(base);
      if (rel.empty() || *rel.begin() == "..") rel = p;
      scans[std::to_string(year)] = rel.generic_string();
    }
    s["scans"] = scans;
    if (!e.annotations.empty()) s["annotations"] = e.annotations;
    subjects.push_back(s);
  }
  json j;
  j["subjects"] = subjects;
  if (!base.empty()) fs::create_directories(base);
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot write manifest " + path.string());
  out << j.dump(2) << "\n";
}

SubjectRecord load_subject(const ManifestEntry& entry) {
  SubjectRecord r;
  r.id = entry.id;
  r.group = entry.group;
  for (const auto& [year, p] : entry.scans) r.scans.emplace(year, read_volume(p));
  return r;
}

}  // namespace longipet
