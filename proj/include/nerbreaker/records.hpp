#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nerbreaker/evaluation.hpp"

namespace nerbreaker {

// Attack records persist as JSON Lines: an optional header object
// {"header": true, "schema_version": "1.0", "created": ...} followed by one
// record object per line. Shards may be concatenated, headers included.

inline constexpr const char* kRecordSchemaVersion = "1.0";

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json record_to_json(const AttackRecord& record);
AttackRecord record_from_json(const nlohmann::json& j);

/// Header line with the given creation stamp.
std::string records_header(const std::string& created);

void write_records(std::ostream& out, const std::vector<AttackRecord>& records,
                   const std::string& created);
void write_records_file(const std::string& path, const std::vector<AttackRecord>& records,
                        const std::string& created);

/// Reads records, skipping header lines and blank lines. Unknown major
/// schema versions are refused with SchemaError.
std::vector<AttackRecord> read_records(std::istream& in, const std::string& source = "<stream>");
std::vector<AttackRecord> read_records_file(const std::string& path);

}  // namespace nerbreaker
