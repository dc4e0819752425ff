#include "lmh/jsonl.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "lmh/error.hpp"
#include "lmh/text.hpp"

namespace lmh::jsonl {

namespace fs = std::filesystem;

void for_each_line(const fs::path& path,
                   const std::function<void(const nlohmann::json&, std::size_t)>& fn) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (text::trim(line).empty()) continue;
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw MalformedLine(line_no, e.what());
        }
        fn(doc, line_no);
    }
}

void write_lines(const fs::path& path, const std::vector<nlohmann::json>& docs) {
    std::string out;
    for (const auto& doc : docs) {
        out += doc.dump();
        out += '\n';
    }
    write_file_atomic(path, out);
}

void write_file_atomic(const fs::path& path, const std::string& content) {
    static std::atomic<unsigned> counter{0};
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    const auto tid = std::hash<std::thread::id>{}(std::this_thread::get_id());
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(tid) + "." + std::to_string(counter.fetch_add(1));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("short write to " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace lmh::jsonl
