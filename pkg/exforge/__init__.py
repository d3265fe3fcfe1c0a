__version__ = '0.1.0'

from .exceptions import ExforgeError, ConfigError, InputError, ValidationError
from .paramtype import ParamType, NON_STRING_TYPES
from .surface import (ParameterSpec, CommandSpec, CommandSurface,
                      load_surface, lookup_command, serialize_surface,
                      write_surface)
from .telemetry import (TelemetryRecord, UsageAggregate, ExampleTemplate,
                        IngestResult, read_records, ingest, aggregate,
                        shard_records, merge_aggregates, build_templates,
                        write_templates, read_templates)
from .miner import (SourceDocument, Argument, MinedExample, ValueLookup,
                    extract_blocks, candidate_lines, parse_invocation,
                    filter_corpus, build_lookup, load_corpus, mine_document,
                    mine_corpus, write_mined, read_mined, write_lookup,
                    read_lookup)
from .forest import (Hyperparameters, Forest, hyperparameters_from_csv,
                     train_forest, predict, predict_proba)
from .classifier import (LabeledParam, FeatureVector, Vocabulary,
                         TypePredictor, CVReport, preprocess,
                         build_vocabulary, featurize, featurize_matrix,
                         train_two_stage, train_single_stage, predict_types,
                         predict_type, cross_validate, weighted_f1,
                         write_cv_report, labeled_params_from_surface,
                         read_labeled_params, write_labeled_params,
                         save_predictor, load_predictor)
from .filler import (Provenance, FilledArgument, FilledExample,
                     TypedLookupFiller, HybridFiller, validate_value,
                     synthesize_string_name, fill_template, fill_all,
                     write_filled, read_filled)
from .augment import (MaskedPair, CooccurrenceModel, finetune_permutations,
                      build_finetune_dataset, span_mask,
                      build_pretraining_dataset, reconstruct, write_dataset,
                      train_cooccurrence, generate_values, write_cooccurrence,
                      read_cooccurrence)
from .emit import (HumanExample, ExampleBlock, RenderedDoc,
                   load_human_examples, build_doc, render_help,
                   render_markdown, render_group_doc, insert_fragment,
                   update_doc, render_patch, apply_patch)
from .metrics import (RougeScore, CoverageReport, HelpSuccessStat, Session,
                      rouge, rouge_corpus, coverage, format_coverage,
                      sessionize, help_success, help_success_frame,
                      fisher_p_value, placeholder_summary)
from .config import PipelineConfig, load_config
from .datasets import (fixture_path, surface_data, type_frequencies,
                       synthetic_labeled_params, synthetic_surface,
                       synthetic_telemetry)


def version():
    print(__version__)
