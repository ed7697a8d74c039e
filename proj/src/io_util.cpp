#include "voltvar/io_util.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace voltvar {

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write file: " + tmp.string());
        f << content;
        f.flush();
        if (!f) throw std::runtime_error("short write: " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string format_double(double v) {
    char buf[64];
    // %.17g always round-trips; prefer the shorter %.15g when it does too.
    std::snprintf(buf, sizeof(buf), "%.15g", v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back != v) std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace voltvar
