from .exporter import (ExportError, ExportManifest, export_features,
                       read_manifest)

__all__ = ["ExportError", "ExportManifest", "export_features",
           "read_manifest"]
