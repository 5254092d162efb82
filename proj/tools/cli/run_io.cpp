#include "run_io.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "bubbletower/error.hpp"
#include "bubbletower/grid.hpp"

namespace bubbletower::cli {

namespace {

std::string to_hex(const unsigned char* bytes, unsigned len) {
  std::ostringstream out;
  out << std::hex << std::setfill('0');
  for (unsigned i = 0; i < len; ++i) out << std::setw(2) << static_cast<int>(bytes[i]);
  return out.str();
}

std::string digest(const void* data, std::size_t size) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(data, size, md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::Io, "SHA-256 computation failed");
  return to_hex(md, len);
}

}  // namespace

std::string sha256_text(const std::string& text) { return digest(text.data(), text.size()); }

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_text(buf.str());
}

fs::path default_output(const std::string& name) {
  const char* root = std::getenv("BUBBLETOWER_DATA_DIR");
  return (root && *root ? fs::path(root) : fs::path("runs")) / name;
}

json file_entry(const fs::path& run_dir, const fs::path& file) {
  return {{"path", fs::relative(file, run_dir).generic_string()}, {"sha256", sha256_file(file)}};
}

void write_json(const fs::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << doc.dump(2) << '\n';
  if (!out) fail(ErrorCode::Io, "error writing '" + path.string() + "'");
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::Io, "malformed JSON in '" + path.string() + "': " + e.what());
  }
}

LoadedRun load_run(const fs::path& run_dir) {
  LoadedRun run;
  run.manifest = read_json(run_dir / "manifest.json");
  const auto& m = run.manifest;
  if (!m.contains("snapshots") || !m["snapshots"].is_array() || m["snapshots"].empty())
    fail(ErrorCode::Io, "run '" + run_dir.string() + "' lists no snapshots");
  for (const auto& entry : m["snapshots"]) {
    const fs::path p = run_dir / entry.at("path").get<std::string>();
    if (!fs::exists(p)) fail(ErrorCode::Io, "missing snapshot '" + p.string() + "'");
    run.trajectory.add(read_snapshot(p.string()));
  }
  run.trajectory.blowup_mode = m.value("blowup", false);
  run.trajectory.T_ref = run.trajectory.blowup_mode ? m.at("T_est").get<double>() : run.trajectory.times.back();
  return run;
}

}  // namespace bubbletower::cli
