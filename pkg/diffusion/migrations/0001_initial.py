import django.db.models.deletion
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
        ('synthdata', '0001_initial'),
    ]

    operations = [
        migrations.CreateModel(
            name='TrainingRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('name', models.CharField(max_length=255)),
                ('arm', models.CharField(choices=[('base', 'Base'), ('wild_aug', '+WildAug'), ('wild_aug+ar', '+WildAug+L_ar')], default='wild_aug+ar', max_length=20)),
                ('profile', models.CharField(choices=[('smoke', 'Smoke'), ('desk', 'Desk'), ('full', 'Full')], default='desk', max_length=20)),
                ('overrides', models.JSONField(blank=True, default=dict)),
                ('config', models.JSONField(blank=True, default=dict)),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('done', 'Done'), ('failed', 'Failed')], default='pending', max_length=20)),
                ('error', models.TextField(blank=True)),
                ('run_dir', models.CharField(blank=True, max_length=500)),
                ('encoder_hash', models.CharField(blank=True, max_length=64)),
                ('final_ldm', models.FloatField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('dataset', models.ForeignKey(blank=True, null=True, on_delete=django.db.models.deletion.SET_NULL, related_name='runs', to='synthdata.syntheticdataset')),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='Checkpoint',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('step', models.PositiveIntegerField()),
                ('path', models.CharField(max_length=500)),
                ('unet_hash', models.CharField(max_length=64)),
                ('encoder_hash', models.CharField(max_length=64)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='checkpoints', to='diffusion.trainingrun')),
            ],
            options={
                'ordering': ['step'],
                'constraints': [models.UniqueConstraint(fields=('run', 'step'), name='unique_checkpoint_step')],
            },
        ),
    ]
