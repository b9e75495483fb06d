#pragma once

// JSON wire format shared by the annotation server and its clients. Every
// message is an envelope {revision, command|response|event, payload}.

#include <string>
#include <string_view>

#include "json.hpp"
#include "poseforge/session.hpp"

namespace poseforge::protocol {

using json = nlohmann::ordered_json;

json pose_to_json(const RigidTransform& pose);
RigidTransform pose_from_json(const json& j);

/// ParseError / InvalidCommand on malformed input.
Command command_from_json(std::string_view name, const json& payload);
json command_to_json(const Command& command);

json delta_to_json(const StateDelta& delta);
json record_to_json(const AnnotationRecord& record);
json history_to_json(const std::vector<HistoryEntry>& history);
/// Objects, cameras and session progress; enough for a client mirror.
json state_to_json(const Session& session);
json mesh_to_json(const MeshAsset& mesh);

json envelope(std::uint64_t revision, std::string_view key, std::string_view name, json payload);
json error_envelope(std::uint64_t revision, std::string_view kind, std::string_view message);

/// HTTP status for an error kind.
int http_status(ErrorKind kind);

}  // namespace poseforge::protocol
