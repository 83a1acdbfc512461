"""Versioned text templates for referral phrases and QA prompts.

Changing any wording here requires bumping the matching template id, since the id
is recorded in every emitted record.
"""

SCENEGRAPH_TEMPLATE_ID = "scenegraph_qa/v1"
GROUNDING_TEMPLATE_ID = "grounding_qa/v1"
GLOBAL_COGMAP_TEMPLATE_ID = "global_cogmap_qa/v1"

SCENEGRAPH_SYSTEM_CONTEXT = (
    "You are building a cognitive map of the scene shown in the video. "
    "A LocalCogMap is a 10x10 bird's-eye-view grid with cells [u, v], u and v in 0..9. "
    "Two anchor objects fix the grid: anchor 1 is always at [5, 5] and anchor 2 is always at [5, 3], "
    "so one cell is half the anchor-to-anchor distance, +v points from anchor 2 toward anchor 1 "
    "and +u points to the right when looking along +v. "
    "Your task is to place the target object on this grid."
)

SCENEGRAPH_QUESTION = (
    "Anchor 1: the {anchor_a_category} ({anchor_a_id}) at [5, 5]. "
    "Anchor 2: the {anchor_b_category} ({anchor_b_id}) at [5, 3]. "
    "Which cell holds the {target_category} ({target_id})? Answer as [u, v]."
)

GROUNDING_SYSTEM_CONTEXT = (
    "You are localizing objects in the 3D scene shown in the video. "
    "Use the global frame whose origin is the camera position in the first frame, "
    "whose +x axis is the first camera's viewing direction projected onto the floor, "
    "and whose +z axis points up (right-handed). "
    "Describe a box as (x_c, y_c, z_c, l, w, h, yaw): center and size in meters, "
    "yaw in radians about +z, all with two decimals."
)

GROUNDING_QUESTION = "Give the 3D bounding box of {phrase}."

GLOBAL_COGMAP_SYSTEM_CONTEXT = (
    "You are building a cognitive map of the scene shown in the video. "
    "The whole room is drawn on one 10x10 bird's-eye-view grid with cells [u, v], u and v in 0..9, "
    "scaled so the scene's larger horizontal extent spans cells 0 to 9."
)

GLOBAL_COGMAP_QUESTION = "Which cell holds the {category} ({object_id})? Answer as [u, v]."

# Referral phrases
PROXIMITY_PHRASES = {
    "nearest": "the {category} nearest to the {anchor_category}",
    "furthest": "the {category} furthest from the {anchor_category}",
}

DIRECTION_RELATIONS = {
    "front": "in front of",
    "right": "to the right of",
    "behind": "behind",
    "left": "to the left of",
}

DIRECTION_PHRASE = (
    "the {category} {relation} the {position_category} "
    "when looking from the {position_category} toward the {orientation_category}"
)

TEMPORAL_PHRASE = "the {ordinal} {category} to appear in the video"

BARE_PHRASE = "the {category}"

_ORDINAL_WORDS = (
    "first",
    "second",
    "third",
    "fourth",
    "fifth",
    "sixth",
    "seventh",
    "eighth",
    "ninth",
    "tenth",
)


def ordinal(rank: int) -> str:
    """1 -> 'first', 11 -> '11th', 22 -> '22nd'."""
    if 1 <= rank <= len(_ORDINAL_WORDS):
        return _ORDINAL_WORDS[rank - 1]
    if 11 <= rank % 100 <= 13:
        suffix = "th"
    else:
        suffix = {1: "st", 2: "nd", 3: "rd"}.get(rank % 10, "th")
    return f"{rank}{suffix}"
