#pragma once

#include "soliclone/frontend.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>

#ifndef SOLICLONE_FIXTURE_DIR
#error "SOLICLONE_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace fixtures {

inline std::filesystem::path dir(const std::string& sub = {}) {
    std::filesystem::path p(SOLICLONE_FIXTURE_DIR);
    return sub.empty() ? p : p / sub;
}

inline std::string read(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("missing fixture " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline soliclone::ParsedUnit parse(const std::string& relpath) {
    return soliclone::parse_source(soliclone::SourceFile::from_text(relpath, read(dir() / relpath)));
}

inline soliclone::ParsedUnit parse_text(std::string text, std::string path = "inline.sol") {
    return soliclone::parse_source(soliclone::SourceFile::from_text(std::move(path), std::move(text)));
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("soliclone_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline void write(const std::filesystem::path& p, const std::string& text) {
    std::filesystem::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

} // namespace fixtures
