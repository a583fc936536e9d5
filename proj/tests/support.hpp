#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "xcot/corpus.hpp"
#include "xcot/prompting.hpp"

#ifndef XCOT_SOURCE_DIR
#error "XCOT_SOURCE_DIR must be defined by the build"
#endif

namespace testsupport {

inline std::string source_path(const std::string& rel) {
    return std::string(XCOT_SOURCE_DIR) + "/" + rel;
}

inline std::string fixture_path(const std::string& rel) {
    return source_path("tests/fixtures/" + rel);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

// Unique scratch directory removed on destruction.
class TempDir {
  public:
    TempDir() {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("xcot_test_" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string str(const std::string& rel = "") const {
        return rel.empty() ? path_.string() : (path_ / rel).string();
    }

  private:
    std::filesystem::path path_;
};

// Same layout `prompt render` prints; golden files are stored in this form.
inline std::string format_prompt(const xcot::RenderedPrompt& prompt) {
    std::ostringstream out;
    for (std::size_t step = 0; step < prompt.steps.size(); ++step) {
        out << "# step " << (step + 1) << "\n";
        for (const auto& message : prompt.steps[step])
            out << "[" << xcot::role_name(message.role) << "]\n" << message.content << "\n";
    }
    return out.str();
}

inline xcot::Instance load_fixture_instance(const std::string& dataset_file, xcot::Task task,
                                            const char* language, const std::string& id) {
    xcot::Dataset dataset = xcot::load_dataset(fixture_path("datasets/" + dataset_file), task,
                                               xcot::LanguageCode::parse(language));
    for (const auto& instance : dataset.instances)
        if (instance.id == id) return instance;
    throw std::runtime_error("fixture instance not found: " + id);
}

}  // namespace testsupport
