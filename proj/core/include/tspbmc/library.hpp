#pragma once

// Protocols and scenarios embedded in the binary.

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tspbmc {

struct LibraryEntry {
  std::string name;
  std::string protocol_text;
  /// Scenario name -> JSON text. Always contains "fair".
  std::map<std::string, std::string> scenarios;
  /// Scenario names expected to yield an attack.
  std::vector<std::string> attack_scenarios;
  std::string notes;
};

const std::vector<LibraryEntry>& library();

/// nullptr when `name` is not a library protocol.
const LibraryEntry* find_library_entry(const std::string& name);

/// Writes `<dir>/<name>.ab` and `<dir>/<name>/<scenario>.json` for every
/// entry. Returns the files written.
std::vector<std::filesystem::path> export_library(const std::filesystem::path& dir);

}  // namespace tspbmc
