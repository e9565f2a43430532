#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "evspike/pipeline.hpp"
#include "evspike/synthetic.hpp"

namespace evspike {

// Minimal INI: [section] headers (repeating a section name starts a new
// instance), key = value pairs, '#' or ';' comments, blank lines ignored.
// Values keep inner whitespace but are trimmed at both ends.
struct IniEntry {
    std::string key;
    std::string value;
    std::size_t line = 0;  // 1-based
};

struct IniSection {
    std::string name;
    std::size_t line = 0;  // 1-based line of the [section] header
    std::vector<IniEntry> entries;

    const std::string* find(const std::string& key) const;  // first occurrence or nullptr
};

std::vector<IniSection> parse_ini(std::istream& in, const std::string& origin);

// [geometry]/[time_base]/[dbscan]/[window]/[run] once, [branch] repeated in
// band order. Unknown sections or keys are errors, as are missing required
// keys; messages carry origin:line context.
PipelineConfig load_pipeline_config(std::istream& in, const std::string& origin);
PipelineConfig load_pipeline_config_file(const std::string& path);

// [scene] once, [object] and [static_region] repeated.
SceneSpec load_scene_config(std::istream& in, const std::string& origin);
SceneSpec load_scene_config_file(const std::string& path);

}  // namespace evspike
