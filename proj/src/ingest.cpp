#include "corpusprep/ingest.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "corpusprep/error.hpp"
#include "corpusprep/unicode.hpp"

namespace corpusprep {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

// Reads a line terminated by LF, stripping a trailing CR. Returns false at EOF.
bool read_header_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

}  // namespace

std::optional<std::string> WetRecord::header(std::string_view name) const {
  for (const auto& [key, value] : headers)
    if (iequals(key, name)) return value;
  return std::nullopt;
}

std::string DumpRef::label() const {
  return std::to_string(year) + "-" + std::to_string(week);
}

DumpRef parse_dump_label(const std::string& label) {
  std::size_t dash = label.find('-');
  if (dash == std::string::npos || dash == 0 || dash + 1 >= label.size())
    throw ParseError("dump label must be YYYY-WW: '" + label + "'");
  int year = 0, week = 0;
  auto parse_int = [&](std::string_view s, int& out) {
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && ptr == s.data() + s.size();
  };
  if (!parse_int(std::string_view(label).substr(0, dash), year) ||
      !parse_int(std::string_view(label).substr(dash + 1), week))
    throw ParseError("dump label must be numeric YYYY-WW: '" + label + "'");
  if (year < 2008) throw ParseError("dump year before 2008: '" + label + "'");
  if (week < 1 || week > 53)
    throw ParseError("dump week outside [1,53]: '" + label + "'");
  return DumpRef{year, week};
}

bool WetReader::next(WetRecord& record) {
  record.headers.clear();
  record.body.clear();

  std::string line;
  // Tolerate blank padding between records.
  do {
    if (!read_header_line(input_, line)) return false;
  } while (line.empty());

  std::size_t index = records_read_;
  if (line != "WARC/1.0")
    throw ParseError("record " + std::to_string(index) +
                     ": expected WARC/1.0 version line, got '" + line + "'");

  bool saw_content_length = false;
  std::size_t content_length = 0;
  while (true) {
    if (!read_header_line(input_, line))
      throw ParseError("record " + std::to_string(index) + ": stream ended inside header block");
    if (line.empty()) break;  // blank line terminates the header block
    std::size_t colon = line.find(':');
    if (colon == std::string::npos)
      throw ParseError("record " + std::to_string(index) + ": malformed header line '" + line + "'");
    std::string name = line.substr(0, colon);
    std::size_t value_start = colon + 1;
    while (value_start < line.size() && line[value_start] == ' ') ++value_start;
    std::string value = line.substr(value_start);
    if (iequals(name, "Content-Length")) {
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), content_length);
      if (ec != std::errc() || ptr != value.data() + value.size())
        throw ParseError("record " + std::to_string(index) + ": bad Content-Length '" + value + "'");
      saw_content_length = true;
    }
    record.headers.emplace_back(std::move(name), std::move(value));
  }
  if (!saw_content_length)
    throw ParseError("record " + std::to_string(index) + ": missing Content-Length header");

  record.body.resize(content_length);
  input_.read(record.body.data(), static_cast<std::streamsize>(content_length));
  if (static_cast<std::size_t>(input_.gcount()) != content_length)
    throw ParseError("record " + std::to_string(index) + ": body truncated (" +
                     std::to_string(input_.gcount()) + " of " +
                     std::to_string(content_length) + " bytes)");
  ++records_read_;
  return true;
}

std::vector<WetRecord> parse_wet_stream(std::istream& input) {
  std::vector<WetRecord> records;
  WetReader reader(input);
  WetRecord record;
  while (reader.next(record)) records.push_back(record);
  return records;
}

bool looks_gzipped(const std::string& bytes) {
  return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
         static_cast<unsigned char>(bytes[1]) == 0x8b;
}

std::string gunzip(const std::string& compressed) {
  z_stream zs{};
  // 15+32: accept both gzip and zlib wrappers.
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw IoError("zlib inflateInit failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());

  std::string out;
  char buffer[1 << 16];
  while (true) {
    zs.next_out = reinterpret_cast<Bytef*>(buffer);
    zs.avail_out = sizeof(buffer);
    int rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw ParseError("gzip stream corrupt (zlib rc " + std::to_string(rc) + ")");
    }
    out.append(buffer, sizeof(buffer) - zs.avail_out);
    if (rc == Z_STREAM_END) {
      if (zs.avail_in == 0) break;
      // Concatenated gzip members (standard for .wet.gz).
      if (inflateReset2(&zs, 15 + 32) != Z_OK) {
        inflateEnd(&zs);
        throw IoError("zlib inflateReset failed");
      }
      continue;
    }
    if (zs.avail_in == 0 && zs.avail_out != 0) {
      inflateEnd(&zs);
      throw ParseError("gzip stream truncated");
    }
  }
  inflateEnd(&zs);
  return out;
}

std::optional<Document> wet_to_document(const WetRecord& record, const DumpRef& dump,
                                        const std::string& corpus, std::uint64_t fileno,
                                        std::uint64_t docno) {
  auto type = record.header("WARC-Type");
  if (!type || *type != "conversion") return std::nullopt;

  Document doc;
  doc.meta.docid = make_docid(corpus, "xx", fileno, docno);
  if (auto uri = record.header("WARC-Target-URI")) doc.meta.url = *uri;
  if (auto date = record.header("WARC-Date"); date && date->size() >= 10)
    doc.meta.download_date = date->substr(0, 10);
  else
    doc.meta.download_date = "1970-01-01";
  doc.meta.language = "xx";
  doc.meta.language_score = 0.0;
  (void)dump;
  doc.text = unicode::repair_utf8(record.body);
  return doc;
}

namespace {

std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::vector<Document> ingest_wet_file(const std::filesystem::path& file, const DumpRef& dump,
                                      const std::string& corpus, std::uint64_t fileno,
                                      bool gzip_ok, IngestStats* stats) {
  std::string bytes = read_file_bytes(file);
  if (looks_gzipped(bytes)) {
    if (!gzip_ok) throw ParseError(file.string() + ": gzipped input but gzip disabled");
    bytes = gunzip(bytes);
  }
  std::istringstream in(bytes);
  std::vector<Document> docs;
  WetReader reader(in);
  WetRecord record;
  std::uint64_t docno = 0;
  while (reader.next(record)) {
    auto doc = wet_to_document(record, dump, corpus, fileno, docno);
    if (doc) {
      docs.push_back(std::move(*doc));
      ++docno;
    } else if (stats) {
      ++stats->skipped_records;
    }
  }
  if (stats) {
    ++stats->files;
    stats->documents += docs.size();
  }
  return docs;
}

std::vector<Document> ingest_text_corpus(const std::filesystem::path& directory,
                                         const std::string& corpus, IngestStats* stats,
                                         const std::string& download_date) {
  if (!std::filesystem::is_directory(directory))
    throw IoError("not a directory: " + directory.string());

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    if (ext == ".txt" || ext == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Document> docs;
  std::uint64_t fileno = 0;
  for (const auto& file : files) {
    std::uint64_t docno = 0;
    try {
      if (file.extension() == ".txt") {
        Document doc;
        doc.meta.docid = make_docid(corpus, "xx", fileno, docno);
        doc.meta.title = file.stem().string();
        doc.meta.download_date = download_date;
        doc.meta.language = "xx";
        doc.meta.language_score = 0.0;
        doc.text = unicode::repair_utf8(read_file_bytes(file));
        docs.push_back(std::move(doc));
      } else {
        std::ifstream in(file);
        if (!in) throw IoError("cannot open " + file.string());
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
          ++lineno;
          if (line.empty()) continue;
          try {
            Document doc = parse_document(line);
            doc.meta.docid = make_docid(corpus, "xx", fileno, docno);
            if (doc.meta.language.empty()) doc.meta.language = "xx";
            if (doc.meta.download_date.empty()) doc.meta.download_date = download_date;
            docs.push_back(std::move(doc));
            ++docno;
          } catch (const std::exception& e) {
            if (stats)
              stats->errors.push_back(file.string() + ":" + std::to_string(lineno) + ": " +
                                      e.what());
          }
        }
      }
      if (stats) ++stats->files;
    } catch (const std::exception& e) {
      if (stats) stats->errors.push_back(file.string() + ": " + e.what());
    }
    ++fileno;
  }
  if (stats) stats->documents += docs.size();
  return docs;
}

}  // namespace corpusprep
