#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

namespace nonins {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Streams a jsonl file. Blank lines are ignored. With `strict` a malformed
/// line throws; otherwise it is passed to `on_error` and skipped.
void read_jsonl(const fs::path& path, bool strict, const std::function<void(json&&)>& on_record,
                const std::function<void(std::size_t line, const std::string& what)>& on_error = {});

/// Line-at-a-time writer. Output is flushed per record so a crash leaves a
/// readable prefix.
class JsonlWriter {
public:
    JsonlWriter(const fs::path& path, bool append = false);

    void write(const json& record);
    std::size_t count() const noexcept { return count_; }
    void close();

private:
    fs::path path_;
    std::ofstream out_;
    std::size_t count_ = 0;
};

std::string read_file(const fs::path& path);
json read_json_file(const fs::path& path);

/// Writes via a temporary sibling and rename, so readers never see a partial file.
void write_file_atomic(const fs::path& path, const std::string& contents);
void write_json_file(const fs::path& path, const json& value);

/// Canonical serialization used for hashing and for byte-stable artifacts.
std::string canonical_dump(const json& value);

}  // namespace nonins
