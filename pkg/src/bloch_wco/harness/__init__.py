"""Symbol files, corpus loading and the report CLI."""
