"""Lab control plane: command grammar, device registry, motion watch, entry control."""
