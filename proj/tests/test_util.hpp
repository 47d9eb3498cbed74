#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>
#include <vector>

#include "rcfm/dataset.hpp"

namespace test_util {

/// Unique-ish temp path for this process.
inline std::string temp_path(const std::string& name) {
    static const std::string prefix =
        (std::filesystem::temp_directory_path() /
         ("rcfm_test_" + std::to_string(static_cast<unsigned long>(::getpid())) + "_"))
            .string();
    return prefix + name;
}

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

inline rcfm::Dataset make_dataset(const std::vector<std::vector<double>>& rows,
                                  const std::vector<int>* labels = nullptr) {
    rcfm::Dataset d;
    d.points = rcfm::Matrix(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < rows[i].size(); ++j) d.points(i, j) = rows[i][j];
        d.ids.push_back(std::to_string(i));
    }
    if (labels) d.labels = *labels;
    return d;
}

inline rcfm::Partition make_partition(std::vector<int> assignment, int k) {
    return rcfm::Partition{std::move(assignment), k};
}

}  // namespace test_util
