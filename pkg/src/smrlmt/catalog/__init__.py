"""Relations shipped with the toolkit, one ``.smrl`` file each."""

from __future__ import annotations

from importlib import resources

from ..dsl import RelationAst, load_relations

# Further entries of the OWASP-derived catalog; named here, no sources shipped.
STUBS = (
    "OTG_CONFIG_007",
    "OTG_AUTHN_010",
    "OTG_AUTHZ_003",
    "OTG_AUTHN_004",
    "OTG_AUTHZ_004",
    "OTG_SESS_006",
    "OTG_SESS_007",
    "OTG_SESS_008",
    "OTG_INPVAL_003",
    "OTG_INPVAL_004",
    "OTG_CRYPST_004",
    "OTG_BUSLOGIC_005",
)


def catalog_files() -> dict[str, str]:
    """File name to source text of every shipped relation."""
    root = resources.files(__package__)
    return {
        entry.name: entry.read_text(encoding="utf-8")
        for entry in sorted(root.iterdir(), key=lambda e: e.name)
        if entry.name.endswith(".smrl")
    }


def catalog_path(name: str):
    return resources.files(__package__) / name


def load_catalog() -> dict[str, RelationAst]:
    """Relation name to checked AST."""
    out: dict[str, RelationAst] = {}
    for source in catalog_files().values():
        for rel in load_relations(source):
            out[rel.name] = rel
    return out
