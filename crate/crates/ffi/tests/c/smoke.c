#include "planforge.h"
#include <stdio.h>

int main(int argc, char **argv) {
    if (argc < 2) {
        return 1;
    }
    PfOptions opts = pf_options_default();
    PfFloorPlan *plan = NULL;
    PfStatus st = pf_reconstruct(argv[1], &opts, &plan);
    if (st != PF_STATUS_OK) {
        fprintf(stderr, "%s\n", pf_last_error());
        return (int)st;
    }
    for (size_t i = 0; i < pf_plan_room_count(plan); i++) {
        char id[64];
        size_t len = 0;
        double area = 0.0;
        pf_plan_room_id(plan, i, id, sizeof id, &len);
        pf_plan_room_area(plan, i, &area);
        printf("%s %.3f\n", id, area);
    }
    pf_plan_free(plan);
    return 0;
}
