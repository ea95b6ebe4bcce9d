#pragma once

#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <string>

#include "dirsign/error.hpp"

// Fails unless `stmt` throws dirsign::Error carrying `expected_code`.
#define EXPECT_ERRC(stmt, expected_code)                                                     \
  do {                                                                                       \
    try {                                                                                    \
      stmt;                                                                                  \
      ADD_FAILURE() << #stmt " did not throw";                                               \
    } catch (const dirsign::Error& e_) {                                                     \
      EXPECT_EQ(e_.code(), expected_code) << "message: " << e_.what();                       \
    }                                                                                        \
  } while (0)

// Fresh per-test scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = std::filesystem::temp_directory_path() / "dirsign_tests" /
             (std::string(info->test_suite_name()) + "." + info->name() + "." + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}
