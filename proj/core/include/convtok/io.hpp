#pragma once

#include <filesystem>
#include <string>

namespace convtok {

// Reads a whole file into a string. Throws IoError if the file cannot be read.
std::string read_text_file(const std::filesystem::path& path);

// Writes `content` to `path` atomically: the data goes to a temporary file in
// the same directory which is then renamed over the target. Throws IoError.
void write_text_file_atomic(const std::filesystem::path& path,
                            const std::string& content);

}  // namespace convtok
