#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <vector>

#include "corpusprep/doc_model.hpp"

namespace corpusprep {

// One WARC record: ordered headers plus raw body bytes.
struct WetRecord {
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;

  // Case-insensitive header lookup (WARC header names are case-insensitive).
  std::optional<std::string> header(std::string_view name) const;
};

struct DumpRef {
  int year = 0;  // >= 2008
  int week = 0;  // in [1, 53]

  // Canonical "YYYY-WW" label, week unpadded.
  std::string label() const;
  bool operator==(const DumpRef&) const = default;
};

DumpRef parse_dump_label(const std::string& label);

// Streaming WARC/1.0 reader. Yields records in file order; throws ParseError
// on framing violations (missing Content-Length, truncated body).
class WetReader {
 public:
  explicit WetReader(std::istream& input) : input_(input) {}

  // Returns false at clean end of stream.
  bool next(WetRecord& record);

  std::size_t records_read() const { return records_read_; }

 private:
  std::istream& input_;
  std::size_t records_read_ = 0;
};

std::vector<WetRecord> parse_wet_stream(std::istream& input);

// Inflates a gzip (or zlib) compressed byte buffer.
std::string gunzip(const std::string& compressed);

bool looks_gzipped(const std::string& bytes);

// Converts one WET record to a Document. Non-"conversion" records yield
// nullopt (skip). Language fields are placeholders until the langid stage.
std::optional<Document> wet_to_document(const WetRecord& record, const DumpRef& dump,
                                        const std::string& corpus, std::uint64_t fileno,
                                        std::uint64_t docno);

struct IngestStats {
  std::size_t files = 0;
  std::size_t documents = 0;
  std::size_t skipped_records = 0;
  std::vector<std::string> errors;  // per-file / per-line errors, processing continued
};

// Walks a directory of .txt (one document per file) and .jsonl files in
// sorted path order. fileno = file ordinal, docno = record ordinal.
std::vector<Document> ingest_text_corpus(const std::filesystem::path& directory,
                                         const std::string& corpus, IngestStats* stats = nullptr,
                                         const std::string& download_date = "1970-01-01");

// Parses a WET file (gzip allowed with gzip_ok) into Documents.
std::vector<Document> ingest_wet_file(const std::filesystem::path& file, const DumpRef& dump,
                                      const std::string& corpus, std::uint64_t fileno,
                                      bool gzip_ok = true, IngestStats* stats = nullptr);

}  // namespace corpusprep
