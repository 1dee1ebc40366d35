#include "nonins/jsonl.hpp"

#include <sstream>

#include "nonins/error.hpp"

namespace nonins {

void read_jsonl(const fs::path& path, bool strict, const std::function<void(json&&)>& on_record,
                const std::function<void(std::size_t, const std::string&)>& on_error) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            const std::string what = path.string() + ":" + std::to_string(line_no) + ": " + e.what();
            if (strict) throw Error(ErrorKind::parse, what);
            if (on_error) on_error(line_no, what);
            continue;
        }
        on_record(std::move(record));
    }
    if (in.bad()) throw Error(ErrorKind::io, "read failed: " + path.string());
}

JsonlWriter::JsonlWriter(const fs::path& path, bool append) : path_(path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    out_.open(path, std::ios::binary | (append ? std::ios::app : std::ios::trunc));
    if (!out_) throw Error(ErrorKind::io, "cannot write " + path.string());
}

void JsonlWriter::write(const json& record) {
    out_ << canonical_dump(record) << '\n';
    out_.flush();
    if (!out_) throw Error(ErrorKind::io, "write failed: " + path_.string());
    ++count_;
}

void JsonlWriter::close() {
    out_.close();
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json_file(const fs::path& path) {
    const std::string body = read_file(path);
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::parse, path.string() + ": " + e.what());
    }
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw Error(ErrorKind::io, "write failed: " + tmp.string());
    }
    fs::rename(tmp, path);
}

void write_json_file(const fs::path& path, const json& value) {
    write_file_atomic(path, value.dump(2) + "\n");
}

std::string canonical_dump(const json& value) {
    // nlohmann::json keeps object keys sorted, so dump() is already canonical.
    return value.dump();
}

}  // namespace nonins
