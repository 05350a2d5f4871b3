from .app import create_app, vocabulary_groups_from_specs

__all__ = ["create_app", "vocabulary_groups_from_specs"]
