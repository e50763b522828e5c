#pragma once

#include <string>
#include <vector>

#include "festa/types.hpp"

// JSONL persistence: dataset manifests, generated sample manifests,
// uncertainty records and skip logs.
namespace festa::manifest {

// One instance per line:
// {"id","question","options":[{"label","text"}],"answer",
//  "media":{"kind","path"},"task","events":[{"label","start_s","end_s"}]?}
// Schema violations report the offending line number.
std::vector<McqInstance> load_dataset(const std::string& path);
void save_dataset(const std::vector<McqInstance>& instances, const std::string& path);

std::string instance_to_json_line(const McqInstance& instance);
McqInstance instance_from_json_line(const std::string& line);

// Sample manifests: provenance-complete, media by staged path.
void save_samples(const std::vector<TransformedInput>& samples, const std::string& path);
std::vector<TransformedInput> load_samples(const std::string& path);

void save_records(const std::vector<UncertaintyRecord>& records, const std::string& path);
std::vector<UncertaintyRecord> load_records(const std::string& path);
std::string record_to_json_line(const UncertaintyRecord& record);
UncertaintyRecord record_from_json_line(const std::string& line);

struct SkipEntry {
  std::string instance_id;
  std::string stage;   // "generate" | "score"
  std::string reason;
};

void append_skip(const SkipEntry& entry, const std::string& path);
std::vector<SkipEntry> load_skips(const std::string& path);

}  // namespace festa::manifest
