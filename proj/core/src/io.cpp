#include "convtok/io.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "convtok/error.hpp"

namespace convtok {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open for reading: " + path.string());
  }
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) {
    throw IoError("read failed: " + path.string());
  }
  return content;
}

void write_text_file_atomic(const std::filesystem::path& path,
                            const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open for writing: " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::remove(tmp.string().c_str());
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.string().c_str());
    throw IoError("rename failed: " + path.string() + ": " + ec.message());
  }
}

}  // namespace convtok
