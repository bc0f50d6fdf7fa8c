#!/usr/bin/env python3
"""Tour of the core objects: emails, zone taxonomies, and mappings."""

from zoneseg import Email, builtin_taxonomies, builtin_taxonomy, map_annotation, split_lines
from zoneseg.emails import AnnotatedEmail

body = "Hello Ana,\r\n\r\nThe draft is attached.\n> Did you get my mail?\n"
lines = split_lines(body)
print("lines:", lines)

email = Email(id="demo-1", lang="en", lines=tuple(lines))
print("email:", email.id, email.lang, len(email.lines), "lines")

for taxonomy in builtin_taxonomies():
    print(f"taxonomy {taxonomy.name}: {len(taxonomy.zones)} zones -> {', '.join(taxonomy.zones)}")

gmane15 = builtin_taxonomy("gmane15")
annotated = AnnotatedEmail(
    email=email,
    zones=("salutation", "visual_separator", "paragraph", "quotation"),
)

# Project the fine-grained annotation onto the coarse 2-zone schema.
two2 = builtin_taxonomy("two2")
mapping = gmane15.mapping_to(two2)
coarse = map_annotation(annotated, mapping)
for line, fine, rough in zip(email.lines, annotated.zones, coarse.zones):
    print(f"{fine:>16} -> {rough:<6} | {line}")
