#include "skg/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

#include "skg/types.hpp"

namespace skg {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw Error("SHA-256 initialisation failed");
  }
  void update(const void* data, std::size_t n) {
    if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw Error("SHA-256 update failed");
  }
  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), md, &len) != 1) throw Error("SHA-256 final failed");
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
      s += digits[md[i] >> 4];
      s += digits[md[i] & 15];
    }
    return s;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, void (*)(EVP_MD_CTX*)> ctx_;
};

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  Sha256 h;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    h.update(buf, static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

void write_atomic(const fs::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw Error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw Error("cannot rename " + tmp.string() + ": " + ec.message());
}

std::vector<FileRecord> inventory(const fs::path& dir) {
  std::vector<FileRecord> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel == kManifestName) continue;
    files.push_back({rel, sha256_file(entry.path()), entry.file_size()});
  }
  std::sort(files.begin(), files.end(),
            [](const FileRecord& a, const FileRecord& b) { return a.path < b.path; });
  return files;
}

std::string manifest_to_json(const RunManifest& m) {
  ojson j;
  j["schema"] = m.schema;
  j["version"] = m.version;
  j["config"] = ojson::parse(m.config_json);
  j["summary"] = ojson::parse(m.summary_json);
  ojson t = ojson::object();
  for (const auto& [phase, s] : m.timings) t[phase] = s;
  j["timings"] = t;
  j["warnings"] = m.warnings;
  j["failure"] = m.failure ? ojson(*m.failure) : ojson(nullptr);
  j["exit_code"] = m.exit_code;
  ojson files = ojson::array();
  for (const auto& f : m.files) files.push_back({{"path", f.path}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  j["files"] = files;
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::exception& e) {
    throw ConfigError({std::string("manifest is not valid JSON: ") + e.what()});
  }
  try {
    RunManifest m;
    m.schema = j.at("schema").get<std::string>();
    if (m.schema != kManifestSchema)
      throw ConfigError({"unsupported manifest schema '" + m.schema + "'"});
    m.version = j.at("version").get<std::string>();
    m.config_json = j.at("config").dump();
    m.summary_json = j.at("summary").dump();
    for (const auto& [k, v] : j.at("timings").items()) m.timings.emplace_back(k, v.get<double>());
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (!j.at("failure").is_null()) m.failure = j.at("failure").get<std::string>();
    m.exit_code = j.at("exit_code").get<int>();
    for (const auto& f : j.at("files"))
      m.files.push_back({f.at("path").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    return m;
  } catch (const ojson::exception& e) {
    throw ConfigError({std::string("malformed manifest: ") + e.what()});
  }
}

RunManifest read_manifest(const fs::path& dir) {
  const fs::path p = dir / kManifestName;
  if (!fs::exists(p)) throw ConfigError({"no " + std::string(kManifestName) + " in " + dir.string()});
  return manifest_from_json(read_text(p));
}

void write_manifest(const fs::path& dir, const RunManifest& m) {
  write_atomic(dir / kManifestName, manifest_to_json(m));
}

ManifestCheck verify_manifest(const fs::path& dir, const RunManifest& m) {
  ManifestCheck c;
  const auto now = inventory(dir);
  for (const auto& f : m.files) {
    const auto it = std::find_if(now.begin(), now.end(),
                                 [&](const FileRecord& g) { return g.path == f.path; });
    if (it == now.end()) {
      c.missing.push_back(f.path);
    } else if (!(*it == f)) {
      c.changed.push_back(f.path);
    }
  }
  for (const auto& g : now)
    if (std::none_of(m.files.begin(), m.files.end(),
                     [&](const FileRecord& f) { return f.path == g.path; }))
      c.unlisted.push_back(g.path);
  return c;
}

}  // namespace skg
