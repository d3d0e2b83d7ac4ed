// SPDX-License-Identifier: Apache-2.0
#include "aimtrace/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "aimtrace/blt.hpp"
#include "aimtrace/carve.hpp"
#include "aimtrace/endpoints.hpp"
#include "aimtrace/error.hpp"
#include "aimtrace/findings.hpp"
#include "aimtrace/fs_scan.hpp"
#include "aimtrace/imlog.hpp"
#include "aimtrace/io.hpp"
#include "aimtrace/oft3.hpp"
#include "aimtrace/pcap.hpp"
#include "aimtrace/registry.hpp"
#include "aimtrace/report.hpp"
#include "json.hpp"

namespace aimtrace {

namespace stdfs = std::filesystem;

namespace {

// Evidence that cannot be read or is in an unsupported container.
class Unreadable : public Error {
 public:
  using Error::Error;
};

struct Config {
  std::string kb;
  std::string templates;
  std::string signatures;
  std::vector<std::string> keywords;
  std::optional<std::uint64_t> max_len;
};

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  const Bytes raw = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(as_chars(raw));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config " + path + ": " + e.what(), e.byte);
  }
  try {
    c.kb = j.value("kb", std::string{});
    c.templates = j.value("templates", std::string{});
    c.signatures = j.value("signatures", std::string{});
    c.keywords = j.value("keywords", std::vector<std::string>{});
    if (j.contains("max_len")) c.max_len = j["max_len"].get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config " + path + ": " + e.what(), raw.size());
  }
  return c;
}

Bytes read_evidence(const std::string& path) {
  try {
    return read_file(path);
  } catch (const IoError& e) {
    throw Unreadable(e.what());
  }
}

std::vector<std::string> read_lines(const std::string& path) {
  const Bytes raw = read_evidence(path);
  std::vector<std::string> out;
  std::string_view text = as_chars(raw);
  while (!text.empty()) {
    auto nl = text.find('\n');
    auto line = trim(text.substr(0, nl));
    if (!line.empty()) out.emplace_back(line);
    if (nl == std::string_view::npos) break;
    text.remove_prefix(nl + 1);
  }
  return out;
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  write_file(out_path, as_bytes(text));
}

void emit_case(Case c, const std::string& out_path, std::ostream& out) {
  c.findings = merge_findings(std::move(c.findings));
  validate_case(c);
  emit(save_case(c), out_path, out);
}

std::string safe_name(std::string s) {
  for (auto& ch : s)
    if (ch == '/' || ch == '\\' || ch == ':' || ch == '\0') ch = '_';
  return s;
}

}  // namespace

const std::vector<std::string>& default_keywords() {
  static const std::vector<std::string> k = {"IM history with buddy", "Cool FileXfer", "aim.exe", "AIMLogger"};
  return k;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recovery of AIM client artifacts from file trees, raw images, captures and registry exports",
               "aimtrace"};
  app.require_subcommand(1);
  std::string config_path;
  std::string case_id = "aimtrace";
  app.add_option("--config", config_path, "JSON file with defaults (kb, templates, signatures, keywords, max_len)");
  app.add_option("--case-id", case_id, "Case identifier written into produced case files");

  std::string out_path;
  auto add_out = [&out_path](CLI::App* sub) { sub->add_option("--out", out_path, "Output file (default: stdout)"); };

  auto* scan_fs = app.add_subcommand("scan-fs", "Scan an extracted or mounted Windows tree");
  std::string root;
  std::string templates_path;
  scan_fs->add_option("--root", root, "Tree root")->required();
  scan_fs->add_option("--templates", templates_path, "Path template catalog (JSON)");
  add_out(scan_fs);

  auto* carve = app.add_subcommand("carve", "Carve IM logs and search keywords in a raw blob");
  std::string input;
  std::uint64_t max_len = 0;
  std::string keywords_path, extract_dir, signatures_path;
  std::vector<std::string> screen_names;
  carve->add_option("--input", input, "Raw image, memory dump or swap file")->required();
  carve->add_option("--max-len", max_len, "Longest carve span in bytes")->check(CLI::PositiveNumber);
  carve->add_option("--keywords", keywords_path, "Extra keywords, one per line");
  carve->add_option("--screen-name", screen_names, "Screen names added to the keyword set");
  carve->add_option("--extract", extract_dir, "Write carved spans to this directory");
  carve->add_option("--signatures", signatures_path, "Signature catalog (JSON)");
  add_out(carve);

  auto* blt_cmd = app.add_subcommand("blt", "Parse saved Buddy List files");
  std::vector<std::string> blt_files;
  blt_cmd->add_option("files", blt_files, "Buddy List files")->required();
  add_out(blt_cmd);

  auto* imlog_cmd = app.add_subcommand("imlog", "Parse AIM IM log files");
  std::string imlog_path, owner, correspondent;
  imlog_cmd->add_option("path", imlog_path, "Log file or directory")->required();
  imlog_cmd->add_option("--owner", owner, "Screen name of the log owner");
  imlog_cmd->add_option("--correspondent", correspondent, "Screen name of the correspondent");
  add_out(imlog_cmd);

  auto* pcap_cmd = app.add_subcommand("pcap", "Dissect a packet capture");
  std::string pcap_path, kb_path, dump_dir;
  pcap_cmd->add_option("file", pcap_path, "Classic pcap file")->required();
  pcap_cmd->add_option("--kb", kb_path, "Endpoint knowledge base (JSON)");
  pcap_cmd->add_option("--dump-streams", dump_dir, "Write reassembled streams to this directory");
  add_out(pcap_cmd);

  auto* reg_cmd = app.add_subcommand("reg", "Extract artifacts from .reg exports");
  std::vector<std::string> reg_files;
  reg_cmd->add_option("files", reg_files, ".reg files")->required();
  add_out(reg_cmd);

  auto* report_cmd = app.add_subcommand("report", "Export a case as JSON or CSV");
  std::string case_path, format;
  report_cmd->add_option("--case", case_path, "Case file")->required();
  report_cmd->add_option("--format", format, "json or csv")->required()->check(CLI::IsMember({"json", "csv"}));
  add_out(report_cmd);

  auto* case_cmd = app.add_subcommand("case", "Create and combine case files");
  case_cmd->require_subcommand(1);
  auto* case_new = case_cmd->add_subcommand("new", "Create an empty case");
  std::string new_id;
  case_new->add_option("--id", new_id, "Case identifier")->required();
  add_out(case_new);
  auto* case_add = case_cmd->add_subcommand("add", "Merge extractor outputs into a case file in place");
  std::string target;
  std::vector<std::string> parts;
  case_add->add_option("--case", target, "Case file to update")->required();
  case_add->add_option("inputs", parts, "Case files produced by extractor subcommands")->required();
  auto* case_merge = case_cmd->add_subcommand("merge", "Merge case files into a new one");
  std::vector<std::string> merge_inputs;
  case_merge->add_option("inputs", merge_inputs, "Case files")->required()->expected(2, -1);
  add_out(case_merge);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "aimtrace: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    const Config cfg = load_config(config_path);
    Case c;
    c.case_id = case_id;

    if (*scan_fs) {
      std::error_code ec;
      if (!stdfs::is_directory(root, ec)) throw Unreadable(root + ": not a readable directory");
      std::vector<fs::PathTemplate> templates = fs::builtin_templates();
      const std::string tpath = templates_path.empty() ? cfg.templates : templates_path;
      if (!tpath.empty()) templates = fs::load_templates(as_chars(read_file(tpath)));
      const auto& src = register_source(c, SourceKind::FsTree, root);
      auto result = fs::scan_tree(root, src.id, templates);
      for (const auto& d : result.diagnostics) err << "scan-fs: " << d << "\n";
      c.findings = std::move(result.findings);
      emit_case(std::move(c), out_path, out);
    } else if (*carve) {
      std::vector<Signature> sigs = builtin_signatures();
      const std::string spath = signatures_path.empty() ? cfg.signatures : signatures_path;
      if (!spath.empty()) sigs = load_signatures(as_chars(read_file(spath)));
      const std::uint64_t limit = max_len ? max_len : cfg.max_len.value_or(0);
      if (limit)
        for (auto& s : sigs) s.max_length = limit;
      std::vector<std::string> needles = cfg.keywords.empty() ? default_keywords() : cfg.keywords;
      if (!keywords_path.empty())
        for (auto& k : read_lines(keywords_path)) needles.push_back(std::move(k));
      for (const auto& n : screen_names)
        if (!n.empty()) needles.push_back(n);
      std::sort(needles.begin(), needles.end());
      needles.erase(std::unique(needles.begin(), needles.end()), needles.end());

      std::ifstream in(input, std::ios::binary);
      if (!in) throw Unreadable(input + ": cannot open");
      BlobScanner scanner(sigs, needles, {Encoding::Ascii, Encoding::Utf16le});
      try {
        run_scanner(scanner, in, 1 << 20);
      } catch (const IoError& e) {
        throw Unreadable(input + ": " + e.what());
      }
      const auto& src = register_source(c, SourceKind::RawBlob, input);
      for (const auto& hit : scanner.carve_hits()) {
        c.findings.push_back(carve_finding(hit, src.id));
        if (!extract_dir.empty()) {
          stdfs::create_directories(extract_dir);
          write_file(stdfs::path(extract_dir) / (safe_name(hit.signature_name) + "_" + std::to_string(hit.offset) + ".bin"),
                     hit.payload);
        }
      }
      for (const auto& hit : scanner.keyword_hits()) c.findings.push_back(keyword_finding(hit, src.id));
      emit_case(std::move(c), out_path, out);
    } else if (*blt_cmd) {
      for (const auto& file : blt_files) {
        const Bytes raw = read_evidence(file);
        const auto& src = register_source(c, SourceKind::FsTree, file);
        Finding f = buddy_list_text_finding(as_chars(raw), Locator{src.id, FilePath{stdfs::path(file).filename().string()}});
        if (auto it = f.attributes.find("parse_error"); it != f.attributes.end())
          err << "blt: " << file << ": " << it->second << "\n";
        c.findings.push_back(std::move(f));
      }
      emit_case(std::move(c), out_path, out);
    } else if (*imlog_cmd) {
      std::error_code ec;
      std::vector<std::pair<stdfs::path, std::string>> files;  // full path, locator path
      if (stdfs::is_directory(imlog_path, ec)) {
        for (stdfs::recursive_directory_iterator it(imlog_path, ec), end; !ec && it != end; it.increment(ec)) {
          if (it->is_regular_file() && (iends_with(it->path().string(), ".html") || iends_with(it->path().string(), ".htm")))
            files.emplace_back(it->path(), it->path().lexically_relative(imlog_path).generic_string());
        }
        if (ec) throw Unreadable(imlog_path + ": " + ec.message());
      } else {
        files.emplace_back(imlog_path, stdfs::path(imlog_path).filename().string());
      }
      std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
      const auto& src = register_source(c, SourceKind::FsTree, imlog_path);
      for (const auto& [full, rel] : files) {
        const Bytes raw = read_evidence(full.string());
        auto who = imlog::derive_participants_from_path(full.generic_string());
        if (!owner.empty()) who.owner = owner;
        if (!correspondent.empty()) who.correspondent = correspondent;
        auto conv = imlog::parse_im_log(as_chars(raw), who.owner, who.correspondent);
        c.findings.push_back(conversation_finding(conv, Locator{src.id, FilePath{rel}}, Confidence::Definite));
      }
      emit_case(std::move(c), out_path, out);
    } else if (*pcap_cmd) {
      const Bytes raw = read_evidence(pcap_path);
      net::PcapFile pf;
      try {
        pf = net::read_pcap(raw);
      } catch (const UnsupportedFormat& e) {
        throw Unreadable(pcap_path + ": unsupported format " + e.format());
      }
      for (const auto& d : pf.diagnostics) err << "pcap: " << d << "\n";
      net::KnowledgeBase kb = net::builtin_knowledge_base();
      const std::string kpath = kb_path.empty() ? cfg.kb : kb_path;
      if (!kpath.empty()) kb = net::load_knowledge_base(as_chars(read_file(kpath)));
      net::ReassemblyStats stats;
      const auto flows = net::reassemble_tcp(pf.records, &stats);
      if (stats.malformed || stats.fragments)
        err << "pcap: skipped " << stats.malformed << " malformed packets and " << stats.fragments << " fragments\n";
      const auto& src = register_source(c, SourceKind::Pcap, pcap_path);
      for (auto& f : net::classify_endpoints(flows, kb, src.id)) c.findings.push_back(std::move(f));
      for (auto& f : net::scan_http_screen_names(flows, src.id)) c.findings.push_back(std::move(f));
      for (const auto& flow : flows) {
        const auto headers = net::scan_flow(flow);
        for (const auto& ev : net::aggregate_transfers(headers, flow, kb))
          c.findings.push_back(net::transfer_finding(ev, src.id));
        if (!dump_dir.empty()) {
          stdfs::create_directories(dump_dir);
          const std::string base = safe_name(flow.flow_id);
          write_file(stdfs::path(dump_dir) / (base + ".a2b.bin"), flow.a_to_b.bytes);
          write_file(stdfs::path(dump_dir) / (base + ".b2a.bin"), flow.b_to_a.bytes);
        }
      }
      emit_case(std::move(c), out_path, out);
    } else if (*reg_cmd) {
      for (const auto& file : reg_files) {
        const Bytes raw = read_evidence(file);
        reg::RegExport exp;
        try {
          exp = reg::parse_reg_export(raw);
        } catch (const UnsupportedFormat& e) {
          throw Unreadable(file + ": " + e.what());
        }
        for (const auto& d : exp.diagnostics) err << "reg: " << file << ": " << d << "\n";
        const auto& src = register_source(c, SourceKind::RegExport, file);
        for (auto& f : reg::extract_aim_registry_artifacts(exp, src.id)) c.findings.push_back(std::move(f));
      }
      emit_case(std::move(c), out_path, out);
    } else if (*report_cmd) {
      const Bytes raw = read_evidence(case_path);
      const Case loaded = load_case(as_chars(raw));
      emit(export_report(loaded, format == "csv" ? ReportFormat::Csv : ReportFormat::Json), out_path, out);
    } else if (*case_new) {
      Case fresh;
      fresh.case_id = new_id;
      emit_case(std::move(fresh), out_path, out);
    } else if (*case_add) {
      Case into = load_case(as_chars(read_evidence(target)));
      for (const auto& p : parts) merge_case(into, load_case(as_chars(read_evidence(p))));
      emit_case(std::move(into), target, out);
    } else if (*case_merge) {
      Case into = load_case(as_chars(read_evidence(merge_inputs.front())));
      for (std::size_t i = 1; i < merge_inputs.size(); ++i)
        merge_case(into, load_case(as_chars(read_evidence(merge_inputs[i]))));
      emit_case(std::move(into), out_path, out);
    }
    return kExitOk;
  } catch (const Unreadable& e) {
    err << "aimtrace: " << e.what() << "\n";
    return kExitUnreadable;
  } catch (const ParseError& e) {
    err << "aimtrace: " << e.what() << " (byte " << e.offset() << ")\n";
    return kExitUnreadable;
  } catch (const IoError& e) {
    err << "aimtrace: " << e.what() << "\n";
    return kExitUnreadable;
  } catch (const std::exception& e) {
    err << "aimtrace: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace aimtrace
