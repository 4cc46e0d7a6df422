from bellsim.pipeline import AcceptancePipeline, AcceptanceSizes, random_prelocc_pipeline
from bellsim.process.superprocess import SuperprocessForm


def _pipeline():
    sizes = AcceptanceSizes(random_mixtures=2, horodecki_states=1, separable_states=1, povm_pairs=2,
                            local_behaviors=1, dpi_instances=1, prelocc_pipelines=1, construction_pairs=1)
    return AcceptancePipeline(sizes, seed=0)


def test_cheap_acceptance_checks():
    pipeline = _pipeline()
    for check in (pipeline.check_chsh_maximum, pipeline.check_witness_separation,
                  pipeline.check_fully_local_states, pipeline.check_process_algebra,
                  pipeline.check_witness_construction):
        row = check()
        assert row["passed"], row


def test_random_prelocc_pipeline_shape():
    sp, process = random_prelocc_pipeline(seed=3)
    assert sp.form is SuperprocessForm.PRE_LOCC
    assert not process.instantaneous
    assert process.channel.in_dims.dims == (2, 2)
