class ExtractorError(Exception):
    """Invalid job, dataset, or store contents (not an I/O failure)."""
