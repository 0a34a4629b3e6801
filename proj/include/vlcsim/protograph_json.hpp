#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "protograph.hpp"

namespace vlcsim {

inline std::string to_json(const BaseMatrix& b) {
  nlohmann::json j;
  j["rows"] = b.rows;
  j["cols"] = b.cols;
  j["family"] = b.family;
  j["extension_count"] = b.extension_count;
  j["punctured"] = std::vector<int>(b.punctured.begin(), b.punctured.end());
  std::vector<std::vector<int>> m(b.rows, std::vector<int>(b.cols));
  for (int r = 0; r < b.rows; ++r)
    for (int c = 0; c < b.cols; ++c) m[r][c] = b.at(r, c);
  j["entries"] = m;
  j["design_rate"] = b.design_rate();
  return j.dump(2);
}

}  // namespace vlcsim
