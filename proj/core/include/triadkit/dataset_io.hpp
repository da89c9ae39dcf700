#pragma once

#include <filesystem>
#include <optional>
#include <ostream>

#include "triadkit/graph.hpp"

namespace triadkit {

/// Reads events.csv and contacts.csv. External ids are remapped densely in
/// order of first appearance (events first, then contacts). When no window
/// is given it is inferred as [min, max] event timestamp.
/// Throws ValidationError carrying the line number of the first bad row.
TemporalMultigraph load_dataset(const std::filesystem::path& event_file,
                                const std::filesystem::path& contact_file,
                                std::optional<Window> window = std::nullopt);

void write_events_csv(const TemporalMultigraph& g, std::ostream& out);
void write_contacts_csv(const TemporalMultigraph& g, std::ostream& out);
void write_id_map(const TemporalMultigraph& g, std::ostream& out);

}  // namespace triadkit
